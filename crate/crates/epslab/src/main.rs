fn main() {
    std::process::exit(epslab::cli::run(std::env::args()));
}
