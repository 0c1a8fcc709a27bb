fn main() {
    std::process::exit(ddlmi::cli::run_from_args(std::env::args_os()));
}
