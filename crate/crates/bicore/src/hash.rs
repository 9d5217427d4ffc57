/// 64-bit FNV-1a over a byte stream. Used for graph checksums in index files
/// and for method-independent result hashes of query answers.
pub fn fnv1a_64<I: IntoIterator<Item = u8>>(bytes: I) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
