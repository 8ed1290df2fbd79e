use clap::Parser;

fn main() {
    let cli = match bandlab_cli::cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = bandlab_cli::cli::run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
