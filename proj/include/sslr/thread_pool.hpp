/*
 * Copyright 2026 The sslr Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sslr {

// Fixed-size worker pool for the data-parallel part of a protocol phase.
// parallel_for blocks until every chunk is done, so a phase's results are
// owned by the caller again when it returns.
class ThreadPool {
 public:
  explicit ThreadPool(std::size_t threads = std::thread::hardware_concurrency()) {
    threads = std::max<std::size_t>(threads, 1);
    for (std::size_t i = 1; i < threads; ++i) {
      workers_.emplace_back([this] { work(); });
    }
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  ~ThreadPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

  std::size_t size() const { return workers_.size() + 1; }

  // Runs fn(begin, end) over [0, n) in chunks of at least `grain` items.
  void parallel_for(std::size_t n, std::size_t grain,
                    const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    grain = std::max<std::size_t>(grain, 1);
    const std::size_t chunks = std::min(size(), (n + grain - 1) / grain);
    if (chunks <= 1) {
      fn(0, n);
      return;
    }
    const std::size_t step = (n + chunks - 1) / chunks;
    std::unique_lock lock(mu_);
    job_ = &fn;
    job_n_ = n;
    job_step_ = step;
    next_chunk_ = 0;
    total_chunks_ = chunks;
    pending_ = chunks;
    error_ = nullptr;
    ++generation_;
    lock.unlock();
    cv_.notify_all();
    run_chunks();
    lock.lock();
    done_cv_.wait(lock, [&] { return pending_ == 0; });
    job_ = nullptr;
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void run_chunks() {
    for (;;) {
      std::size_t begin, end;
      const std::function<void(std::size_t, std::size_t)>* fn;
      {
        std::lock_guard lock(mu_);
        if (job_ == nullptr || next_chunk_ >= total_chunks_) return;
        begin = next_chunk_++ * job_step_;
        end = std::min(job_n_, begin + job_step_);
        fn = job_;
      }
      try {
        if (begin < end) (*fn)(begin, end);
      } catch (...) {
        std::lock_guard lock(mu_);
        if (!error_) error_ = std::current_exception();
      }
      std::lock_guard lock(mu_);
      if (--pending_ == 0) done_cv_.notify_all();
    }
  }

  void work() {
    std::size_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      run_chunks();
    }
  }

  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  bool stop_ = false;
  std::size_t generation_ = 0;
  const std::function<void(std::size_t, std::size_t)>* job_ = nullptr;
  std::size_t job_n_ = 0;
  std::size_t job_step_ = 0;
  std::size_t next_chunk_ = 0;
  std::size_t total_chunks_ = 0;
  std::size_t pending_ = 0;
  std::exception_ptr error_;
};

}  // namespace sslr
