use clap::Parser;
use vidlab::cli::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    let code = dispatch(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
