fn main() {
    let code = lp_euler::experiments::cli::cli_main(std::env::args_os());
    std::process::exit(code);
}
