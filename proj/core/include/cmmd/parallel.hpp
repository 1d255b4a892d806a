#ifndef CMMD_PARALLEL_HPP
#define CMMD_PARALLEL_HPP

#include <Eigen/Dense>
#include <functional>

namespace cmmd {

// Runs body(i) for i in [0, count) over at most `threads` workers, each owning
// one contiguous index chunk. threads <= 1 runs inline. The first exception
// thrown by any worker is rethrown on the calling thread. Callers stay
// deterministic by writing only to slots addressed by i, never by arrival
// order.
void parallel_for(Eigen::Index count, int threads,
                  const std::function<void(Eigen::Index)>& body);

}  // namespace cmmd

#endif
