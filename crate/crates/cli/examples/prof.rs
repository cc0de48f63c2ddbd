fn main() {
    let a: Vec<String> = std::env::args().collect();
    let which = a[1].as_str();
    let n = 10000;
    match which {
        "m1" => { std::hint::black_box(trajsim_cli::bench::mm1_saturation(n, 1, false, 1)); }
        "m50" => { std::hint::black_box(trajsim_cli::bench::mm1_saturation(n, 50, false, 1)); }
        "c" => { std::hint::black_box(trajsim_cli::bench::timeout_test(n, false)); }
        _ => { std::hint::black_box(trajsim_cli::bench::timeout_test(n, true)); }
    }
}
