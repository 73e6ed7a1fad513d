use mermin_lhv::{InstructionClass, Observable};

/// Structural configuration: which observables each particle defines, as
/// `(x_defined_mask, z_defined_mask)`.
pub fn configurations(n: usize) -> Vec<(InstructionClass, u32, u32)> {
    let mut out = Vec::new();
    for code in 0..4usize.pow(n as u32) {
        let (mut dx, mut dz) = (0u32, 0u32);
        let (mut k, mut l) = (0, 0);
        for i in 0..n {
            let t = code / 4usize.pow(i as u32) % 4;
            if t & 1 == 1 {
                dx |= 1 << i;
            }
            if t & 2 == 2 {
                dz |= 1 << i;
            }
            match t {
                3 => k += 1,
                1 | 2 => l += 1,
                _ => {}
            }
        }
        out.push((InstructionClass::new(k, l, n - k - l), dx, dz));
    }
    out
}

/// Every query as `(x_mask, z_mask)` over distinct particles.
pub fn queries(n: usize) -> Vec<(u32, u32)> {
    (0..3usize.pow(n as u32))
        .map(|code| {
            let (mut qx, mut qz) = (0u32, 0u32);
            for i in 0..n {
                match code / 3usize.pow(i as u32) % 3 {
                    1 => qx |= 1 << i,
                    2 => qz |= 1 << i,
                    _ => {}
                }
            }
            (qx, qz)
        })
        .collect()
}

pub fn as_query(n: usize, qx: u32, qz: u32) -> Vec<(usize, Observable)> {
    (0..n)
        .filter_map(|i| {
            if qx >> i & 1 == 1 {
                Some((i, Observable::X))
            } else if qz >> i & 1 == 1 {
                Some((i, Observable::Z))
            } else {
                None
            }
        })
        .collect()
}

/// Members of `class` as `(x_defined_mask, z_defined_mask)`.
pub fn members(configs: &[(InstructionClass, u32, u32)], class: InstructionClass) -> Vec<(u32, u32)> {
    configs
        .iter()
        .filter(|(c, _, _)| *c == class)
        .map(|&(_, dx, dz)| (dx, dz))
        .collect()
}

pub fn covered(members: &[(u32, u32)], qx: u32, qz: u32) -> usize {
    members
        .iter()
        .filter(|&&(dx, dz)| qx & dx == qx && qz & dz == qz)
        .count()
}
