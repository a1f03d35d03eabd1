fn main() {
    std::process::exit(sparsepois::cli::run());
}
