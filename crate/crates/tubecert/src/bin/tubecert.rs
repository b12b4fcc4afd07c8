fn main() { std::process::exit(tubecert::cli::run()); }
