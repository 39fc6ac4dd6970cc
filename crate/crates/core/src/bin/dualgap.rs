fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(dualgap::cli::cli_main(&args));
}
