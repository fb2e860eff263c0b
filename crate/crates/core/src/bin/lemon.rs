fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(lemon_billiards::cli::run(&argv));
}
