use std::process::ExitCode;

fn main() -> ExitCode {
    // The Rust runtime ignores SIGPIPE, which turns `ncclab ... | head` into
    // a panic inside println!. Restore the default so a closed pipe ends the
    // process quietly, as shell consumers expect.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    ncclab::cli::run()
}
