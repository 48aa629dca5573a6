use std::io::Write;

fn main() {
    let outcome = fsard_aoi::cli::run_command(std::env::args_os());
    std::io::stdout()
        .write_all(&outcome.stdout)
        .expect("standard output is writable");
    eprint!("{}", outcome.stderr);
    std::process::exit(outcome.code);
}
