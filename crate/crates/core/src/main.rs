fn main() {
    std::process::exit(gmbp::harness::cli_main(std::env::args_os()));
}
