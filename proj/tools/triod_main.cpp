#include "triodflow/cli.hpp"

int main(int argc, char** argv) {
    return triodflow::dispatch(std::vector<std::string>(argv, argv + argc));
}
