fn main() {
    std::process::exit(pnc_cli::cli_main(std::env::args_os()));
}
