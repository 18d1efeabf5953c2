fn main() {
    std::process::exit(constrained_ot::cli::run_from(std::env::args_os()));
}
