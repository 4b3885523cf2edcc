#pragma once
#include <cstddef>
#include <functional>

namespace dd {

// Per-sample loops run either through the serial reference path or the
// OpenMP path. Both must produce identical results.
enum class Exec { serial, parallel };

// Honors DROPDECOMP_THREADS once at first use; returns the active count.
int thread_count();
void set_thread_count(int n);

void for_each_index(std::size_t n, Exec exec, const std::function<void(std::size_t)>& body);

}  // namespace dd
