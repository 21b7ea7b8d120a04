fn main() {
    std::process::exit(otrelax_cli::run(std::env::args_os()));
}
