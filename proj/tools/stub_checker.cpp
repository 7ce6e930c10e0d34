// Scriptable checker used by the test suite to exercise the checker protocol:
// it prints whatever the environment tells it to, optionally after sleeping,
// crashing, or exiting non-zero. Arguments are echoed to stderr so tests can
// assert the invocation contract.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <thread>

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) std::fprintf(stderr, "arg:%s\n", argv[i]);
    if (const char* e = std::getenv("ADCTF_STUB_ECHO_ENV"))
        std::fprintf(stderr, "env:%s=%s\n", e, std::getenv(e) ? std::getenv(e) : "");

    if (const char* ms = std::getenv("ADCTF_STUB_SLEEP_MS"))
        std::this_thread::sleep_for(std::chrono::milliseconds(std::atoi(ms)));

    if (std::getenv("ADCTF_STUB_CRASH")) std::abort();

    const char* out = std::getenv("ADCTF_STUB_OUTPUT");
    std::printf("%s\n", out ? out : "101");
    std::fflush(stdout);

    if (const char* code = std::getenv("ADCTF_STUB_EXIT")) return std::atoi(code);
    return 0;
}
