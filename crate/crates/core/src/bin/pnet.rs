fn main() {
    std::process::exit(pnet_core::cli::run());
}
