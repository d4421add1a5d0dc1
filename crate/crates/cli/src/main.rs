fn main() {
    std::process::exit(torus_sr_cli::run(std::env::args_os()));
}
