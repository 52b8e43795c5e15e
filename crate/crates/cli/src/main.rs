fn main() {
    if let Err(e) = l2b_cli::run_args(std::env::args_os()) {
        match &e {
            l2b_cli::CliError::Usage(m) if m.starts_with("error:") || m.starts_with("Usage") || m.contains("\nUsage:") => eprint!("{m}"),
            _ => eprintln!("error: {e}"),
        }
        std::process::exit(e.exit_code());
    }
}
