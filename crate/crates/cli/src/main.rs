use std::io::Write;

fn main() {
    let out = momenta_cli::run(std::env::args_os(), &mut std::io::stdin().lock());
    std::io::stdout()
        .write_all(out.stdout.as_bytes())
        .expect("write stdout");
    std::io::stderr()
        .write_all(out.stderr.as_bytes())
        .expect("write stderr");
    std::process::exit(out.code);
}
