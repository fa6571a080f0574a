use std::process::ExitCode;

fn main() -> ExitCode {
    let (code, out) = bhtool::execute(std::env::args_os());
    if code == 1 {
        eprint!("{out}");
    } else {
        print!("{out}");
    }
    ExitCode::from(code as u8)
}
