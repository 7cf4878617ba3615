fn main() {
    env_logger::init();
    std::process::exit(chainspill::cli::dispatch(std::env::args_os()));
}
