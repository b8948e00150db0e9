fn main() {
    std::process::exit(corrfilt_cli::app::main_entry());
}
