fn main() {
    std::process::exit(multicurve::cli::run());
}
