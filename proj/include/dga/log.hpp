#pragma once

#include <functional>
#include <iostream>
#include <string>

namespace dga {

using warning_handler_t = std::function<void(const std::string&)>;

inline warning_handler_t& warning_handler()
{
    static warning_handler_t h = [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; };
    return h;
}

inline void warn(const std::string& msg)
{
    if (warning_handler())
        warning_handler()(msg);
}

} // namespace dga
