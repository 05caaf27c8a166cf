mod cli;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(cli::main_with(argv));
}
