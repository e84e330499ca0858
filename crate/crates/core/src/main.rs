use std::process::ExitCode;

fn main() -> ExitCode {
    match rfcap::cli::run_command(std::env::args_os()) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            ExitCode::SUCCESS
        }
        Err(e) if e.code == 0 => {
            print!("{}", e.message);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rfcap: {}", e.message.trim_end());
            ExitCode::from(e.code as u8)
        }
    }
}
