fn main() {
    speech_collage::cli::init_logging();
    std::process::exit(speech_collage::cli::run(std::env::args_os()));
}
