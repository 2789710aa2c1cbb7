fn main() -> std::process::ExitCode { transport_eigenmaps::cli::main() }
