fn main() {
    std::process::exit(retinex_pso::cli::run(std::env::args_os()));
}
