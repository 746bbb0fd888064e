fn main() {
    std::process::exit(proxsplit::bench::cli::cli_main(std::env::args_os()));
}
