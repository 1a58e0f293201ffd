fn main() {
    std::process::exit(qsf_cli::run(std::env::args_os()));
}
