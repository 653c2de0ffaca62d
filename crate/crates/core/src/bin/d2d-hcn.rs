fn main() {
    let out = &mut std::io::stdout().lock();
    let err = &mut std::io::stderr().lock();
    let code = d2d_hcn::cli::run_cli(std::env::args_os(), out, err);
    std::process::exit(code);
}
