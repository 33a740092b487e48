#include "wienerlab/errors.hpp"

#include <iostream>
#include <mutex>

namespace wienerlab {
namespace {

std::mutex& handler_mutex() {
    static std::mutex m;
    return m;
}

WarningHandler& handler_slot() {
    static WarningHandler h = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return h;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
    std::lock_guard lock(handler_mutex());
    WarningHandler old = std::move(handler_slot());
    handler_slot() = std::move(handler);
    return old;
}

void warn(const std::string& message) {
    std::lock_guard lock(handler_mutex());
    if (handler_slot()) handler_slot()(message);
}

}  // namespace wienerlab
