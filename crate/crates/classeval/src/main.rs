fn main() {
    std::process::exit(classeval::cli::run());
}
