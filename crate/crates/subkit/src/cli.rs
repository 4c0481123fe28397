pub fn run_placeholder() {}
