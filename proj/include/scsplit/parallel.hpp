#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace scsplit
{

/// Runs f(0..n-1) on up to `threads` workers. Each index is handled exactly
/// once; results must be written to per-index slots by the caller, which
/// keeps the outcome independent of scheduling. The first exception is
/// rethrown after all workers finish.
template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& f)
{
	if(threads <= 1 || n <= 1)
	{
		for(std::size_t i = 0; i < n; ++i)
		{
			f(i);
		}
		return;
	}
	std::atomic<std::size_t> next{0};
	std::exception_ptr error;
	std::mutex error_mutex;
	const auto worker = [&] {
		for(std::size_t i = next++; i < n; i = next++)
		{
			try
			{
				f(i);
			}
			catch(...)
			{
				std::lock_guard lock(error_mutex);
				if(!error)
				{
					error = std::current_exception();
				}
			}
		}
	};
	std::vector<std::thread> pool;
	const auto count = std::min<std::size_t>(threads, n);
	for(std::size_t t = 0; t < count; ++t)
	{
		pool.emplace_back(worker);
	}
	for(auto& t : pool)
	{
		t.join();
	}
	if(error)
	{
		std::rethrow_exception(error);
	}
}

} // namespace scsplit
