fn main() {
    let code = waring_labels_cli::dispatch(std::env::args());
    std::process::exit(code);
}
