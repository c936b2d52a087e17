#include <stdio.h>

#define N 100000
#define STEPS 50
#define MOD 1000003

static long long u[N], v[N];

int main(void)
{
    long long sum = 0;

    for (int i = 0; i < N; i++)
        u[i] = (i * 37) % 101;

    for (int t = 0; t < STEPS; t++) {
        #pragma omp parallel for
        for (int i = 1; i < N - 1; i++)
            v[i] = (u[i - 1] + u[i] + u[i + 1]) % MOD;
        v[0] = u[0];
        v[N - 1] = u[N - 1];
        for (int i = 0; i < N; i++)
            u[i] = v[i];
    }

    for (int i = 0; i < N; i++)
        sum += u[i];
    printf("%lld\n", sum);
    return 0;
}
