fn main() {
    // Restore the default SIGPIPE disposition so that piping into a pager
    // or `head` terminates the process quietly instead of panicking when
    // stdout closes early.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(rec_lab::cli::run());
}
