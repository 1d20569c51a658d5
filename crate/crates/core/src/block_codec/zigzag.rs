use super::Subband;

/// Row-major indices in zigzag scan order.
pub const ZIGZAG: [usize; 64] = build_zigzag();

const fn build_zigzag() -> [usize; 64] {
    let mut order = [0usize; 64];
    let mut n = 0;
    let mut diag = 0;
    while diag < 15 {
        // Even anti-diagonals run bottom-left to top-right, odd ones the
        // other way round.
        let mut step = 0;
        while step <= diag {
            let (row, col) = if diag % 2 == 0 {
                (diag - step, step)
            } else {
                (step, diag - step)
            };
            if row < 8 && col < 8 {
                order[n] = row * 8 + col;
                n += 1;
            }
            step += 1;
        }
        diag += 1;
    }
    order
}

/// The 64 subbands in zigzag scan order, starting at DC.
pub fn zigzag_positions() -> [Subband; 64] {
    ZIGZAG.map(Subband::from_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_and_end() {
        let z = zigzag_positions();
        let first: Vec<(u8, u8)> = z[..6].iter().map(|s| (s.row, s.col)).collect();
        assert_eq!(first, vec![(0, 0), (0, 1), (1, 0), (2, 0), (1, 1), (0, 2)]);
        assert_eq!(z[63], Subband::new(7, 7));
    }

    #[test]
    fn is_a_permutation() {
        let mut seen = [false; 64];
        for &k in &ZIGZAG {
            assert!(!seen[k]);
            seen[k] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn matches_reference_scan() {
        // Standard JPEG natural-order table.
        const REFERENCE: [usize; 64] = [
            0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34,
            27, 20, 13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37,
            44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
        ];
        assert_eq!(ZIGZAG, REFERENCE);
    }
}
