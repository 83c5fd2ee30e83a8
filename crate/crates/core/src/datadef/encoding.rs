//! Index encodings shared by the enumerators.

use num_bigint::BigInt;

/// Cantor pairing `(i+j)(i+j+1)/2 + j`.
pub fn pair(i: u64, j: u64) -> u128 {
    let w = i as u128 + j as u128;
    w * (w + 1) / 2 + j as u128
}

/// Inverse of [`pair`].
pub fn unpair(n: u64) -> (u64, u64) {
    let n = n as u128;
    let mut w = (isqrt(8 * n + 1) - 1) / 2;
    // isqrt is exact, but keep the triangle bound honest at the edges.
    while w * (w + 1) / 2 > n {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= n {
        w += 1;
    }
    let j = n - w * (w + 1) / 2;
    let i = w - j;
    (i as u64, j as u64)
}

fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// 0, -1, 1, -2, 2, ...
pub fn zigzag(n: u64) -> BigInt {
    if n % 2 == 0 {
        BigInt::from(n / 2)
    } else {
        -BigInt::from(n / 2) - 1
    }
}

pub const CHARSET: &[u8; 62] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

pub fn character(n: u64) -> char {
    CHARSET[(n % 62) as usize] as char
}

pub const SYMBOL_ALPHABET: [&str; 16] = [
    "nil", "t", "a", "b", "c", "x", "y", "z", "u", "v", "w", "red", "green", "blue", "foo", "bar",
];

/// Decodes a list index: `0` is empty, `n + 1` unpairs into head and tail.
pub fn list_indices(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while n > 0 {
        let (head, tail) = unpair(n - 1);
        out.push(head);
        n = tail;
    }
    out
}

/// Inverse of [`list_indices`]; `None` when the index would overflow.
pub fn list_index(items: &[u64]) -> Option<u64> {
    items.iter().rev().try_fold(0u64, |tail, &head| {
        let p = pair(head, tail);
        u64::try_from(p + 1).ok()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unpair_inverts_pair() {
        for n in 0..5000u64 {
            let (i, j) = unpair(n);
            assert_eq!(pair(i, j), n as u128);
        }
        let big = 1u64 << 62;
        let (i, j) = unpair(big);
        assert_eq!(pair(i, j), big as u128);
        let (i, j) = unpair(u64::MAX);
        assert_eq!(pair(i, j), u64::MAX as u128);
    }

    #[test]
    fn zigzag_sequence() {
        let got: Vec<i64> = (0..9).map(|n| i64::try_from(zigzag(n)).unwrap()).collect();
        assert_eq!(got, [0, -1, 1, -2, 2, -3, 3, -4, 4]);
    }

    #[test]
    fn list_index_round_trip() {
        for n in 0..2000u64 {
            assert_eq!(list_index(&list_indices(n)), Some(n));
        }
    }
}
