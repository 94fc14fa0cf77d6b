fn main() {
    if let Err(err) = gssl_cli::run(std::env::args()) {
        // clap help/version requests arrive as errors; print them verbatim.
        if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
            clap_err.print().expect("stderr");
            std::process::exit(clap_err.exit_code());
        }
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
