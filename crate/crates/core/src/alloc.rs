//! Global allocator for binaries that run on the large grids.
//!
//! A time step allocates and frees many 32 MB buffers. Handing them back to
//! the kernel means every reuse pays one page fault per 4 KiB, which costs as
//! much as the arithmetic. [`RetainingAllocator`] keeps freed pages in
//! jemalloc and zeroes with `memset`; install it with
//! [`use_retaining_allocator!`](crate::use_retaining_allocator).

use std::alloc::{GlobalAlloc, Layout};

use tikv_jemallocator::Jemalloc;

pub struct RetainingAllocator;

unsafe impl GlobalAlloc for RetainingAllocator {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        Jemalloc.alloc(layout)
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        Jemalloc.dealloc(ptr, layout)
    }

    // jemalloc would purge and refault to get zero pages.
    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        let ptr = Jemalloc.alloc(layout);
        if !ptr.is_null() {
            std::ptr::write_bytes(ptr, 0, layout.size());
        }
        ptr
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        Jemalloc.realloc(ptr, layout, new_size)
    }
}

/// Pointer to a NUL-terminated jemalloc option string.
#[repr(transparent)]
pub struct MallocConf(pub *const std::ffi::c_char);

unsafe impl Sync for MallocConf {}

/// No dedicated arena for large sizes and no decay: freed pages stay mapped.
pub const MALLOC_CONF: MallocConf =
    MallocConf(c"oversize_threshold:0,dirty_decay_ms:-1,muzzy_decay_ms:-1".as_ptr());

/// Installs [`RetainingAllocator`] with its jemalloc options. Use once, in a binary.
#[macro_export]
macro_rules! use_retaining_allocator {
    () => {
        #[global_allocator]
        static GLOBAL_ALLOCATOR: $crate::alloc::RetainingAllocator =
            $crate::alloc::RetainingAllocator;

        #[used]
        #[export_name = "_rjem_malloc_conf"]
        static JEMALLOC_CONF: $crate::alloc::MallocConf = $crate::alloc::MALLOC_CONF;
    };
}
