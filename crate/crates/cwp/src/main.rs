fn main() {
    std::process::exit(cwp::cli::run());
}
