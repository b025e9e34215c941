fn main() {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("SPIROKIN_LOG", "warn")).try_init();
    std::process::exit(spirokin::cli::run(std::env::args_os()));
}
