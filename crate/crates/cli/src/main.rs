use std::io;
use std::process;

fn main() {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let status = vdse_cli::run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    process::exit(status.code());
}
