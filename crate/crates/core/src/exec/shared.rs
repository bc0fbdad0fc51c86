use core::marker::PhantomData;

/// A mutable slice that several work items of one stage write through
/// concurrently.
///
/// The stage contract guarantees that items write disjoint locations and that
/// nothing reads a location written in the same stage by another item; the
/// unsafe accessors rely on the caller upholding that contract.
pub struct SharedSlice<'a> {
    ptr: *mut f64,
    len: usize,
    _marker: PhantomData<&'a mut [f64]>,
}

// SAFETY: access goes through the unsafe methods below, whose callers promise
// that concurrent accesses touch disjoint indices.
unsafe impl Send for SharedSlice<'_> {}
unsafe impl Sync for SharedSlice<'_> {}

impl<'a> SharedSlice<'a> {
    pub fn new(slice: &'a mut [f64]) -> Self {
        Self {
            ptr: slice.as_mut_ptr(),
            len: slice.len(),
            _marker: PhantomData,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// # Safety
    /// No other live reference may overlap `start..start + len`.
    #[allow(clippy::mut_from_ref)]
    #[inline]
    pub unsafe fn slice_mut(&self, start: usize, len: usize) -> &mut [f64] {
        assert!(start + len <= self.len, "shared slice range out of bounds");
        core::slice::from_raw_parts_mut(self.ptr.add(start), len)
    }

    /// # Safety
    /// No other item may access index `i` during the stage.
    #[inline]
    pub unsafe fn write(&self, i: usize, v: f64) {
        assert!(i < self.len, "shared slice index out of bounds");
        *self.ptr.add(i) = v;
    }
}
