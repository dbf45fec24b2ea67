fn main() {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or(caster_punct_cli::LOG_ENV, "warn"),
    )
    .init();
    std::process::exit(caster_punct_cli::run(std::env::args_os()));
}
