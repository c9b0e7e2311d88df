use bhf::cli::{execute, summary, EXIT_INPUT};

fn main() {
    match execute(std::env::args()) {
        Ok(report) => {
            println!("{}", report.to_json());
            eprintln!("{}", summary(&report));
            std::process::exit(report.exit_code);
        }
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            std::process::exit(EXIT_INPUT);
        }
        Err(e) => e.exit(),
    }
}
