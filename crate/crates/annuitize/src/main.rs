//! Entry point of the `annuitize` command-line tool.

fn main() {
    let code = annuitize::cli::run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
