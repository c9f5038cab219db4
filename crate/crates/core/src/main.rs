fn main() {
    std::process::exit(finray_core::cli::run(std::env::args_os()));
}
