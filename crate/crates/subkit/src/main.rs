fn main() { subkit::cli::run_placeholder(); }
