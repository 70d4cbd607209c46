use std::path::Path;

fn main() {
    use multicurve::selftest as st;
    println!("{}", st::sorted_means_convergence().line());
    println!("{}", st::cli_determinism(Path::new("target/debug/mcl")).line());
}
