fn main() {
    std::process::exit(flextariff::cli::cli_main(std::env::args_os()));
}
