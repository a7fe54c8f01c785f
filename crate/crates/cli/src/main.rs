use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let result = spectral_attention_cli::run(std::env::args_os());
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(result.stdout.as_bytes()).and_then(|_| stdout.flush()).is_err() {
        return ExitCode::from(1);
    }
    if !result.summary.is_empty() {
        eprintln!("{}", result.summary.trim_end());
    }
    ExitCode::from(result.exit_code as u8)
}
