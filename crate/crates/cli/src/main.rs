use std::process::ExitCode;

fn main() -> ExitCode {
    match mlrfit_cli::run_args(std::env::args_os()) {
        Ok(Some(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code() as u8;
            match e {
                mlrfit_cli::CliError::Usage(msg) => eprintln!("{}", msg.trim_end()),
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(code)
        }
    }
}
