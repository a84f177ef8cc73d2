use clap::Parser;
use longbond_cli::Cli;

fn main() {
    // clap exits with 2 on usage errors, matching the config-error code.
    std::process::exit(longbond_cli::run(Cli::parse()));
}
