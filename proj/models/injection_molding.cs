import InjectionMolding;

similarity MoldingSimilarity {
  // filling study parameters
  local PhaseData.backPressure squared;
  local PhaseData.dosingTime squared;
  local PhaseData.switchOverVolume absolute;
  local PhaseData.cylinderHeating absolute;
  local PhaseData.injectionFlow absolute;

  // process values
  local ProcessData.nozzleTemperature absolute;
  local ProcessData.pressure manual relativePressure;

  global weighted {
    PhaseData.switchOverVolume weight 0.4;
    PhaseData.backPressure weight 0.2;
    PhaseData.dosingTime weight 0.2;
    PhaseData.injectionFlow weight 0.15;
    PhaseData.cylinderHeating weight 0.05;
    ProcessData.nozzleTemperature weight 0.5;
    ProcessData.pressure weight 0.5;
  }
}
