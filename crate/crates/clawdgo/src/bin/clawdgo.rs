fn main() {
    std::process::exit(clawdgo::cli::run());
}
