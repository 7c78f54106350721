fn main() {
    std::process::exit(pinchkit::cli::dispatch());
}
