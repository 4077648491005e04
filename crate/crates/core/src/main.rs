fn main() {
    std::process::exit(ann_audit::cli::main_with_args(std::env::args().skip(1)));
}
