#include "fairrec/types.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace fairrec {

namespace {

std::mutex g_handler_mutex;
std::function<void(const std::string&)> g_handler;

}  // namespace

// Serialized so concurrent per-user evaluation can warn safely.
void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(g_handler_mutex);
  if (g_handler) {
    g_handler(message);
  } else {
    std::cerr << "[warn] " << message << "\n";
  }
}

void set_warning_handler(std::function<void(const std::string&)> handler) {
  std::lock_guard<std::mutex> lock(g_handler_mutex);
  g_handler = std::move(handler);
}

}  // namespace fairrec
