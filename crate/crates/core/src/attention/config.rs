use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};

/// Window attention geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttentionConfig {
    /// Number of windows `N`.
    pub n: usize,
    /// Window side `M`; each window holds `M^2` tokens.
    pub m: usize,
    /// Channels `C`.
    pub c: usize,
    /// Heads `P`.
    pub p: usize,
}

impl AttentionConfig {
    pub fn new(n: usize, m: usize, c: usize, p: usize) -> Result<Self> {
        let cfg = Self { n, m, c, p };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return arg_err("config", format!("N and M must be positive, got N={} M={}", self.n, self.m));
        }
        if self.p == 0 || self.c == 0 || self.c % self.p != 0 {
            return arg_err(
                "config",
                format!("channels {} not divisible into {} heads", self.c, self.p),
            );
        }
        Ok(())
    }

    #[inline]
    pub fn m2(&self) -> usize {
        self.m * self.m
    }

    #[inline]
    pub fn tokens(&self) -> usize {
        self.n * self.m2()
    }

    #[inline]
    pub fn head_dim(&self) -> usize {
        self.c / self.p
    }

    /// Side of each relative-bias table, `2M - 1`.
    #[inline]
    pub fn bias_side(&self) -> usize {
        2 * self.m - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(AttentionConfig::new(1, 2, 8, 2).is_ok());
        assert!(AttentionConfig::new(1, 2, 8, 3).is_err());
        assert!(AttentionConfig::new(0, 2, 8, 2).is_err());
        assert!(AttentionConfig::new(1, 0, 8, 2).is_err());
        assert!(AttentionConfig::new(1, 2, 8, 0).is_err());
        let cfg = AttentionConfig::new(4, 7, 96, 3).unwrap();
        assert_eq!((cfg.m2(), cfg.tokens(), cfg.head_dim(), cfg.bias_side()), (49, 196, 32, 13));
    }
}
