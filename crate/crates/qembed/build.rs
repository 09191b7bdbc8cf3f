fn main() {
    // LAPACK symbols (dsyev/zheev) come from the system OpenBLAS.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
