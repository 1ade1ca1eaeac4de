// Link the system OpenBLAS, which bundles BLAS, CBLAS and LAPACK in one
// shared object on Debian-family systems. ndarray's `blas` feature and the
// lapack-sys bindings both resolve their symbols from it.
fn main() {
    println!("cargo:rustc-link-lib=dylib=openblas");
}
