fn main() {
    std::process::exit(sdpkit::cli::run());
}
