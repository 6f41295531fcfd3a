from FoldyLaxPy import RunConfig, Simulation


def main():
    try:
        # 200 point scatterers at unit density in a disk, maximal coupling
        config = RunConfig(task='resonance-map', dim=2, num=200, seed=1, threads=4,
                           k_window=(2.0, 8.0, -0.6, 0.0), grid=(96, 24), configs=4, out='resonances.csv')
        simulation = Simulation(config)

        # Resonance density averaged over 4 configurations (CSV + PGM next to it)
        resonance_map = simulation.resonances.resonance_map()
        print(f"Resonances in the window: {resonance_map.zero_count():.1f}")

        # Diffusion modes of the same disk at k = 6, to compare with the band edge of the map
        spectrum = Simulation(RunConfig.from_mapping({'task': 'diffusion-modes', 'k': '6', 'count': '3',
                                                      'out': 'modes.csv'}, base=config)).run()
        print(f"Effective radius: {spectrum.R_eff:.3f}, fundamental decay rate: {spectrum.gammas[0]:.5f}")

        # Intensity map of configuration 0 for a point source at the center
        intensity = Simulation(config.merged({'task': 'wavefield', 'k': '6', 'grid': '128x128',
                                              'out': 'wavefield.csv'})).run()
        print(f"Wave field: {intensity.shape[1]}x{intensity.shape[0]} pixels")

    except Exception as e:
        print(f"Error: {e}")


if __name__ == '__main__':
    main()
