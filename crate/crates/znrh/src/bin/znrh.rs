use clap::Parser;
use znrh::cli::{run, Cli, EXIT_CHECK_FAILED, EXIT_PASS};

fn main() {
    let cli = Cli::parse();
    let (code, text) = run(&cli);
    if code == EXIT_PASS || code == EXIT_CHECK_FAILED {
        print!("{text}");
    } else {
        eprint!("{text}");
        if !text.ends_with('\n') {
            eprintln!();
        }
    }
    std::process::exit(code);
}
