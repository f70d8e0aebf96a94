fn main() {
    std::process::exit(chsh_monogamy::cli::run());
}
