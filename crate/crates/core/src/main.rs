fn main() {
    env_logger::init();
    std::process::exit(ris_rsm::cli::main_with_args(std::env::args_os()));
}
