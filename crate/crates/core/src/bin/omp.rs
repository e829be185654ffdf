use std::io::Write;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = open_markov::cli::run(&args, &mut out);
    out.flush().unwrap();
    std::process::exit(code);
}
